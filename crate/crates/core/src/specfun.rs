//! Gamma-family functions, the Gauss hypergeometric function on `[0, 1]`, and
//! the radial interaction kernel `K_{N,lambda}(r, s)`.
//!
//! `K_{N,lambda}(r, s)` is the average of `|r w - s w'|^lambda` over pairs of unit
//! vectors `w, w'` in `R^N`. It is what remains of the convolution `|x|^lambda * rho`
//! once both densities are radial.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::even_half;
use crate::quadrature::integrate_interval;

/// Largest number of terms summed by any hypergeometric series.
const MAX_SERIES_TERMS: usize = 100_000;

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { function: "log_gamma", value: x });
    }
    Ok(libm::lgamma_r(x).0)
}

/// `ln |Gamma(x)|` and the sign of `Gamma(x)`; `x` must not be a pole.
fn log_abs_gamma(x: f64) -> (f64, f64) {
    let (lg, sign) = libm::lgamma_r(x);
    (lg, if sign < 0 { -1.0 } else { 1.0 })
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `Gamma(x)` for any real `x` that is not a pole.
pub fn gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) || !x.is_finite() {
        return Err(Error::Domain { function: "gamma", value: x });
    }
    Ok(libm::tgamma(x))
}

/// `B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)` for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok((log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?).exp())
}

/// Digamma `psi(x) = Gamma'(x) / Gamma(x)`, away from the poles.
pub fn digamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli-number asymptotic series
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 / x - series
}

/// Surface area `|S^{N-1}| = 2 pi^{N/2} / Gamma(N/2)` of the unit sphere in `R^N`.
pub fn sphere_area(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * (half * PI.ln() - libm::lgamma_r(half).0).exp()
}

/// Product of gamma functions `prod Gamma(num) / prod Gamma(den)`; poles in the
/// denominator give zero.
fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    if den.iter().any(|&x| is_nonpositive_integer(x)) {
        return 0.0;
    }
    let mut log = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (l, s) = log_abs_gamma(x);
        log += l;
        sign *= s;
    }
    for &x in den {
        let (l, s) = log_abs_gamma(x);
        log -= l;
        sign *= s;
    }
    sign * log.exp()
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for `z` in `[0, 1]`.
///
/// At `z = 1` the Gauss summation formula is used, which needs `c - a - b > 0`
/// unless the series terminates.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain { function: "gauss_2f1", value: z });
    }
    hyp2f1(a, b, c, z, 1.0 - z)
}

/// Same as [`gauss_2f1`] but takes `1 - z` separately, so callers that know it
/// exactly avoid the cancellation in `1 - z` near `z = 1`.
pub(crate) fn hyp2f1(a: f64, b: f64, c: f64, z: f64, omz: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain { function: "gauss_2f1 (parameter c)", value: c });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return Ok(terminating_series(a, b, c, z));
    }
    if omz <= 0.0 {
        let s = c - a - b;
        if s <= 0.0 {
            return Err(Error::Divergent(format!(
                "2F1({a}, {b}; {c}; 1) needs c - a - b > 0, got {s}"
            )));
        }
        return Ok(gamma_ratio(&[c, s], &[c - a, c - b]));
    }
    if z <= 0.75 {
        return power_series(a, b, c, z);
    }
    connection(a, b, c, omz)
}

fn terminating_series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        if term == 0.0 {
            break;
        }
        sum += term;
    }
    sum
}

fn power_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() || term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::Solver(format!(
        "2F1({a}, {b}; {c}; {z}) series did not converge in {MAX_SERIES_TERMS} terms"
    )))
}

/// `z -> 1 - z` transformation for `z > 0.75`; `w = 1 - z`.
fn connection(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let s = c - a - b;
    let k = s.round();
    let d = s - k;
    if d.abs() < 1e-12 {
        if k < 0.0 {
            // Euler transformation swaps the sign of c - a - b.
            return Ok(w.powf(s) * log_case(c - a, c - b, -k as usize, w)?);
        }
        return log_case(a, b, k as usize, w);
    }
    if d.abs() < 1e-4 {
        // Within 1e-4 of the logarithmic case the generic formula cancels badly;
        // interpolate in c between the exact integer case and two safe offsets.
        let h = 2e-4 * d.signum();
        let f0 = connection(a, b, c - d, w)?;
        let f1 = generic_connection(a, b, c - d + h, w)?;
        let f2 = generic_connection(a, b, c - d + 2.0 * h, w)?;
        let t = d / h;
        return Ok(f0 + t * (f1 - f0) + 0.5 * t * (t - 1.0) * (f2 - 2.0 * f1 + f0));
    }
    generic_connection(a, b, c, w)
}

fn generic_connection(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let s = c - a - b;
    let first = gamma_ratio(&[c, s], &[c - a, c - b]);
    let second = gamma_ratio(&[c, -s], &[a, b]);
    let mut value = 0.0;
    if first != 0.0 {
        value += first * power_series(a, b, 1.0 - s, w)?;
    }
    if second != 0.0 {
        value += second * w.powf(s) * power_series(c - a, c - b, 1.0 + s, w)?;
    }
    Ok(value)
}

/// `2F1(a, b; a + b + m; 1 - w)` for a non-negative integer `m` (logarithmic case).
fn log_case(a: f64, b: f64, m: usize, w: f64) -> Result<f64> {
    let mf = m as f64;
    let lw = w.ln();
    let mut finite = 0.0;
    if m > 0 {
        let pre = gamma_ratio(&[mf, a + b + mf], &[a + mf, b + mf]);
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..m {
            let nf = (n - 1) as f64;
            term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
            sum += term;
        }
        finite = pre * sum;
    }
    let pre = gamma_ratio(&[a + b + mf], &[a, b]);
    if pre == 0.0 {
        return Ok(finite);
    }
    // term_n = (a+m)_n (b+m)_n / (n! (n+m)!) w^n
    let mut term = 1.0 / gamma_ratio(&[mf + 1.0], &[]);
    let mut psi_n1 = digamma(1.0);
    let mut psi_nm1 = digamma(mf + 1.0);
    let mut psi_a = digamma(a + mf);
    let mut psi_b = digamma(b + mf);
    let mut sum = 0.0;
    for n in 0..MAX_SERIES_TERMS {
        let contrib = term * (lw - psi_n1 - psi_nm1 + psi_a + psi_b);
        sum += contrib;
        if n > 0 && (contrib.abs() <= 1e-17 * sum.abs() || term == 0.0) {
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            return Ok(finite - sign * w.powi(m as i32) * pre * sum);
        }
        let nf = n as f64;
        term *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_nm1 += 1.0 / (nf + mf + 1.0);
        psi_a += 1.0 / (a + mf + nf);
        psi_b += 1.0 / (b + mf + nf);
    }
    Err(Error::Solver(format!(
        "logarithmic 2F1 series did not converge for a = {a}, b = {b}, m = {m}, w = {w}"
    )))
}

/// Binomial coefficient as a float.
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `E[t^{2k}]` for `t = w . w'` with `w, w'` uniform on the sphere of `R^N`.
fn cosine_even_moment(dim: usize, k: usize) -> f64 {
    let n = dim as f64;
    (0..k).fold(1.0, |acc, j| acc * (2 * j + 1) as f64 / (n + 2.0 * j as f64))
}

/// Coefficients `c_1, ..., c_{n-1}` of `r^{2i} s^{2n-2i}` in `K_{N,2n}(r, s)`.
///
/// The `r^{2n}` and `s^{2n}` coefficients are both 1 and are not included.
pub fn even_coefficients(dim: usize, n: usize) -> Vec<f64> {
    (1..n)
        .map(|i| {
            (0..=n.min(2 * i))
                .step_by(2)
                .filter(|&m| i >= m / 2 && i - m / 2 <= n - m)
                .map(|m| {
                    binomial(n, m)
                        * 2f64.powi(m as i32)
                        * cosine_even_moment(dim, m / 2)
                        * binomial(n - m, i - m / 2)
                })
                .sum()
        })
        .collect()
}

/// How [`kernel_k`] evaluates `K_{N,lambda}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelEvalMethod {
    /// Polynomial expansion, `lambda = 2n`.
    EvenPolynomial,
    /// Elementary closed form, `N = 3`.
    ClosedFormN3,
    /// `2F1` representation, any `N`, `lambda`.
    Hypergeometric,
    /// Direct quadrature of the angular integral, `N >= 2`.
    GegenbauerQuadratureOracle,
}

impl KernelEvalMethod {
    pub const ALL: [KernelEvalMethod; 4] = [
        KernelEvalMethod::EvenPolynomial,
        KernelEvalMethod::ClosedFormN3,
        KernelEvalMethod::Hypergeometric,
        KernelEvalMethod::GegenbauerQuadratureOracle,
    ];

    pub fn supports(self, dim: usize, lambda: f64) -> bool {
        match self {
            KernelEvalMethod::EvenPolynomial => even_half(lambda).is_some(),
            KernelEvalMethod::ClosedFormN3 => dim == 3,
            KernelEvalMethod::Hypergeometric => true,
            KernelEvalMethod::GegenbauerQuadratureOracle => dim >= 2,
        }
    }

    /// Cheapest exact representation available for `(N, lambda)`.
    pub fn preferred(dim: usize, lambda: f64) -> Self {
        if even_half(lambda).is_some() {
            KernelEvalMethod::EvenPolynomial
        } else if dim == 3 {
            KernelEvalMethod::ClosedFormN3
        } else {
            KernelEvalMethod::Hypergeometric
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelEvalMethod::EvenPolynomial => "even-polynomial",
            KernelEvalMethod::ClosedFormN3 => "closed-form-n3",
            KernelEvalMethod::Hypergeometric => "hypergeometric",
            KernelEvalMethod::GegenbauerQuadratureOracle => "gegenbauer-oracle",
        }
    }
}

impl std::str::FromStr for KernelEvalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelEvalMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown kernel method '{s}'")))
    }
}

fn check_kernel_args(dim: usize, lambda: f64, r: f64, s: f64) -> Result<()> {
    if dim < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    if !(r >= 0.0 && s >= 0.0 && r.is_finite() && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("radii must be finite and >= 0, got ({r}, {s})")));
    }
    Ok(())
}

/// `K_{N,lambda}(r, s)` evaluated with the requested representation.
pub fn kernel_k(dim: usize, lambda: f64, r: f64, s: f64, method: KernelEvalMethod) -> Result<f64> {
    check_kernel_args(dim, lambda, r, s)?;
    if !method.supports(dim, lambda) {
        return Err(Error::InvalidParameter(format!(
            "kernel method {} does not apply to N = {dim}, lambda = {lambda}",
            method.name()
        )));
    }
    let (hi, lo) = if r >= s { (r, s) } else { (s, r) };
    if lo == 0.0 {
        return Ok(hi.powf(lambda));
    }
    match method {
        KernelEvalMethod::EvenPolynomial => Ok(kernel_even(dim, even_half(lambda).unwrap(), r, s)),
        KernelEvalMethod::ClosedFormN3 => Ok(kernel_n3(lambda, hi, lo)),
        KernelEvalMethod::Hypergeometric => kernel_hypergeometric(dim, lambda, r, s),
        KernelEvalMethod::GegenbauerQuadratureOracle => kernel_gegenbauer_oracle(dim, lambda, r, s),
    }
}

fn kernel_even(dim: usize, n: usize, r: f64, s: f64) -> f64 {
    let coeffs = even_coefficients(dim, n);
    let (r2, s2) = (r * r, s * s);
    let mut value = r2.powi(n as i32) + s2.powi(n as i32);
    for (i, c) in coeffs.iter().enumerate() {
        let i = i + 1;
        value += c * r2.powi(i as i32) * s2.powi((n - i) as i32);
    }
    value
}

/// `((r+s)^p - |r-s|^p) / (2 p r s)` with `p = lambda + 2`, written in terms of
/// `x = lo / hi` so small ratios keep full precision.
fn kernel_n3(lambda: f64, hi: f64, lo: f64) -> f64 {
    let p = lambda + 2.0;
    let x = lo / hi;
    let diff = if x < 0.5 {
        // (1+x)^p - (1-x)^p = (1-x)^p expm1(2 p atanh x)
        (1.0 - x).powf(p) * (2.0 * p * x.atanh()).exp_m1()
    } else {
        (1.0 + x).powf(p) - (1.0 - x).powf(p)
    };
    hi.powf(lambda) * diff / (2.0 * p * x)
}

fn kernel_hypergeometric(dim: usize, lambda: f64, r: f64, s: f64) -> Result<f64> {
    let (r2, s2) = (r * r, s * s);
    let sum = r2 + s2;
    let z = (4.0 * r2 * s2 / (sum * sum)).min(1.0);
    let omz = ((r2 - s2) / sum).powi(2);
    let a = (2.0 - lambda) / 4.0;
    let b = -lambda / 4.0;
    let c = dim as f64 / 2.0;
    debug_assert!(c - a - b > 0.0);
    Ok(sum.powf(lambda / 2.0) * hyp2f1(a, b, c, z, omz)?)
}

/// `K_{N,lambda}(r, s) - s^lambda` without cancellation when `r << s`.
///
/// Uses `K = s^lambda 2F1(-lambda/2, 1 - (N+lambda)/2; N/2; (r/s)^2)` for `r < s`
/// and drops the leading 1 of the series.
pub fn kernel_minus_power(dim: usize, lambda: f64, r: f64, s: f64) -> Result<f64> {
    check_kernel_args(dim, lambda, r, s)?;
    let x2 = if s > 0.0 { (r / s).powi(2) } else { f64::INFINITY };
    if x2 > 0.25 {
        let method = KernelEvalMethod::preferred(dim, lambda);
        return Ok(kernel_k(dim, lambda, r, s, method)? - s.powf(lambda));
    }
    let a = -lambda / 2.0;
    let b = 1.0 - (dim as f64 + lambda) / 2.0;
    let c = dim as f64 / 2.0;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x2;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            return Ok(s.powf(lambda) * sum);
        }
    }
    Err(Error::Solver("kernel series did not converge".into()))
}

/// `K_{N,lambda}(r, s)` by adaptive quadrature of the angular integral
/// `(|S^{N-2}| / |S^{N-1}|) int_0^pi (r^2 + s^2 - 2 r s cos t)^{lambda/2} sin^{N-2} t dt`.
///
/// Independent of the closed forms; used to validate them.
pub fn kernel_gegenbauer_oracle(dim: usize, lambda: f64, r: f64, s: f64) -> Result<f64> {
    check_kernel_args(dim, lambda, r, s)?;
    if dim < 2 {
        return Err(Error::InvalidParameter("the angular integral needs N >= 2".into()));
    }
    let norm = sphere_area(dim - 1) / sphere_area(dim);
    let d2 = (r - s) * (r - s);
    let rs4 = 4.0 * r * s;
    let exponent = (dim - 2) as i32;
    let integrand = |t: f64| {
        let half = (0.5 * t).sin();
        (d2 + rs4 * half * half).powf(lambda / 2.0) * t.sin().powi(exponent)
    };
    let res = integrate_interval(integrand, 0.0, PI, 1e-14, 0.0)?;
    Ok(norm * res.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn log_gamma_identities() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert!(rel(log_gamma(0.5).unwrap(), 0.5 * PI.ln()) < 1e-14);
        assert!(rel(log_gamma(5.0).unwrap(), 24f64.ln()) < 1e-14);
        assert!(rel(log_gamma(171.0).unwrap(), (1..=170).map(|k| (k as f64).ln()).sum()) < 1e-13);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn log_gamma_recurrence() {
        for k in 1..200 {
            let x = 0.037 * k as f64 + 0.01;
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            assert!((lhs - rhs).abs() < 1e-13 * lhs.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-14, "{}", digamma(1.0) + euler);
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((digamma(-0.5) - digamma(0.5) - 2.0).abs() < 1e-13);
        for k in 1..50 {
            let x = 0.173 * k as f64;
            assert!((digamma(x + 1.0) - digamma(x) - 1.0 / x).abs() < 1e-13);
        }
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(sphere_area(1), 2.0) < 1e-15);
        assert!(rel(sphere_area(2), 2.0 * PI) < 1e-15);
        assert!(rel(sphere_area(3), 4.0 * PI) < 1e-15);
        assert!(rel(sphere_area(4), 2.0 * PI * PI) < 1e-15);
    }

    #[test]
    fn beta_matches_gamma() {
        let b = beta(2.3, 3.8).unwrap();
        let g = gamma(2.3).unwrap() * gamma(3.8).unwrap() / gamma(6.1).unwrap();
        assert!(rel(b, g) < 1e-14);
    }

    #[test]
    fn hypergeometric_elementary() {
        assert_eq!(gauss_2f1(0.3, 1.7, 2.2, 0.0).unwrap(), 1.0);
        for z in [0.25f64, 0.5, 0.75, 0.9, 0.99, 0.999_999] {
            let expected = -(1.0 - z).ln() / z;
            assert!(rel(gauss_2f1(1.0, 1.0, 2.0, z).unwrap(), expected) < 1e-13, "z = {z}");
        }
        // c - a - b = 1: logarithmic connection with m = 1
        for z in [0.5f64, 0.8, 0.95, 0.9999] {
            let expected = 2.0 * (z + (1.0 - z) * (1.0 - z).ln()) / (z * z);
            assert!(rel(gauss_2f1(1.0, 1.0, 3.0, z).unwrap(), expected) < 1e-12, "z = {z}");
        }
        // (1 - z)^{-a}
        for z in [0.3f64, 0.8, 0.97] {
            let expected = (1.0 - z).powf(-0.37);
            assert!(rel(gauss_2f1(0.37, 1.3, 1.3, z).unwrap(), expected) < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn hypergeometric_gauss_sum() {
        let (a, b, c) = (-0.5, -1.0, 2.5);
        let at_one = gauss_2f1(a, b, c, 1.0).unwrap();
        let near = gauss_2f1(a, b, c, 1.0 - 1e-6).unwrap();
        assert!(rel(at_one, near) < 1e-6);
        let direct = gamma(c).unwrap() * gamma(c - a - b).unwrap()
            / (gamma(c - a).unwrap() * gamma(c - b).unwrap());
        assert!(rel(at_one, direct) < 1e-14);
        // non-terminating: continuity of the connection formula at z -> 1
        let (a, b, c) = (-0.425, -1.175, 2.0);
        let at_one = gauss_2f1(a, b, c, 1.0).unwrap();
        assert!(rel(gauss_2f1(a, b, c, 1.0 - 1e-12).unwrap(), at_one) < 1e-9);
        assert!(gauss_2f1(1.0, 1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn hypergeometric_near_integer_c_minus_a_minus_b() {
        // c - a - b sweeps through the integer 2; reference values from 40-digit arithmetic
        let (a, b) = (-0.3, -0.45);
        let z = 0.93;
        let reference = [
            (0.0, 1.112_066_021_239_099_7),
            (1e-13, 1.112_066_021_239_090_1),
            (3e-8, 1.112_066_018_338_218_4),
            (-2e-6, 1.112_066_214_631_519_9),
            (5e-5, 1.112_061_186_640_209_2),
            (-9e-5, 1.112_074_724_542_685_7),
            (0.99e-4, 1.112_056_449_128_084_1),
            (1.01e-4, 1.112_056_255_768_542_7),
            (2e-4, 1.112_046_685_284_816_1),
            (-5e-4, 1.112_114_389_619_354_4),
        ];
        for (d, want) in reference {
            let got = gauss_2f1(a, b, a + b + 2.0 + d, z).unwrap();
            assert!(rel(got, want) < 1e-11, "d = {d}: {got} vs {want}");
        }
    }

    #[test]
    fn hypergeometric_rejects_bad_input() {
        assert!(gauss_2f1(1.0, 1.0, -2.0, 0.5).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.5).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, -0.1).is_err());
    }

    #[test]
    fn even_coefficient_examples() {
        for dim in 1..12usize {
            let n = dim as f64;
            let c2 = even_coefficients(dim, 2);
            assert!(rel(c2[0], 2.0 + 4.0 / n) < 1e-15);
            let c3 = even_coefficients(dim, 3);
            assert!(rel(c3[0], 3.0 + 12.0 / n) < 1e-15 && rel(c3[1], 3.0 + 12.0 / n) < 1e-15);
            let c4 = even_coefficients(dim, 4);
            let e1 = (32.0 + 48.0 / n + 4.0 * n) / (2.0 + n);
            let e2 = (60.0 + 144.0 / n + 6.0 * n) / (2.0 + n);
            assert!(rel(c4[0], e1) < 1e-14 && rel(c4[1], e2) < 1e-14 && rel(c4[2], e1) < 1e-14);
            let c5 = even_coefficients(dim, 5);
            let e1 = (50.0 + 80.0 / n + 5.0 * n) / (2.0 + n);
            let e2 = (140.0 + 480.0 / n + 10.0 * n) / (2.0 + n);
            for (got, want) in c5.iter().zip([e1, e2, e2, e1]) {
                assert!(rel(*got, want) < 1e-14);
            }
        }
        assert!(even_coefficients(4, 1).is_empty());
    }

    #[test]
    fn even_coefficients_palindromic() {
        for dim in 1..9 {
            for n in 2..9 {
                let c = even_coefficients(dim, n);
                for i in 0..c.len() {
                    assert!(rel(c[i], c[c.len() - 1 - i]) < 1e-14);
                }
            }
        }
    }

    #[test]
    fn kernel_examples() {
        use KernelEvalMethod::*;
        for dim in 2..7 {
            for m in [EvenPolynomial, Hypergeometric, GegenbauerQuadratureOracle] {
                assert!(rel(kernel_k(dim, 2.0, 1.0, 2.0, m).unwrap(), 5.0) < 1e-12);
            }
        }
        for m in KernelEvalMethod::ALL {
            let v = kernel_k(3, 4.0, 2.0, 0.0, m).unwrap();
            assert!(rel(v, 16.0) < 1e-15);
        }
        assert!(rel(kernel_k(3, 4.0, 1.0, 1.0, EvenPolynomial).unwrap(), 16.0 / 3.0) < 1e-14);
        assert!(rel(kernel_k(3, 4.0, 1.0, 1.0, ClosedFormN3).unwrap(), 16.0 / 3.0) < 1e-14);
        let hyp = kernel_k(5, 4.7, 1.3, 0.8, Hypergeometric).unwrap();
        let ora = kernel_gegenbauer_oracle(5, 4.7, 1.3, 0.8).unwrap();
        assert!(rel(hyp, ora) < 1e-10, "{hyp} vs {ora}");
        assert!(kernel_k(4, 4.5, 1.0, 1.0, EvenPolynomial).is_err());
        assert!(kernel_k(4, 4.0, 1.0, 1.0, ClosedFormN3).is_err());
        assert!(kernel_k(1, 4.0, 1.0, 1.0, GegenbauerQuadratureOracle).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert!(rel(kernel_gegenbauer_oracle(4, 2.0, 1.0, 2.0).unwrap(), 5.0) < 1e-12);
        assert!(rel(kernel_gegenbauer_oracle(3, 6.0, 1.0, 1.0).unwrap(), 16.0) < 1e-12);
        assert!(rel(kernel_gegenbauer_oracle(5, 4.0, 2.0, 1.0).unwrap(), 28.2) < 1e-12);
    }

    #[test]
    fn logarithmic_kernel_cases_match_oracle() {
        // N - 1 + lambda even and lambda not even: c - a - b is an integer
        for (dim, lambda) in [(4usize, 5.0), (6, 3.0), (3, 2.0 + 1e-7), (2, 1.0), (5, 4.0 + 3e-5)] {
            for (r, s) in [(1.0, 1.0), (1.0, 0.9), (0.3, 1.7), (2.0, 1.99999)] {
                let hyp = kernel_k(dim, lambda, r, s, KernelEvalMethod::Hypergeometric).unwrap();
                let ora = kernel_gegenbauer_oracle(dim, lambda, r, s).unwrap();
                assert!(rel(hyp, ora) < 1e-10, "N={dim} l={lambda} r={r} s={s}: {hyp} vs {ora}");
            }
        }
    }

    #[test]
    fn closed_form_n3_matches_hypergeometric() {
        for lambda in [0.5, 3.0, 4.5, 7.3] {
            for i in 0..10 {
                for j in 0..10 {
                    let r = 0.05 + 0.37 * i as f64;
                    let s = 0.05 + 0.37 * j as f64;
                    let cf = kernel_k(3, lambda, r, s, KernelEvalMethod::ClosedFormN3).unwrap();
                    let hy = kernel_k(3, lambda, r, s, KernelEvalMethod::Hypergeometric).unwrap();
                    assert!(rel(cf, hy) < 1e-10, "lambda={lambda} r={r} s={s}");
                }
            }
        }
        // extreme ratios stay accurate
        let cf = kernel_k(3, 4.0, 1.0, 1e-9, KernelEvalMethod::ClosedFormN3).unwrap();
        let po = kernel_k(3, 4.0, 1.0, 1e-9, KernelEvalMethod::EvenPolynomial).unwrap();
        assert!(rel(cf, po) < 1e-15);
    }

    #[test]
    fn kernel_minus_power_small_r() {
        for (dim, lambda) in [(3usize, 4.0), (5, 6.0), (5, 4.7), (4, 5.5), (6, 3.0)] {
            for (r, s) in [(1e-6, 1.0), (0.3, 1.0), (0.49, 1.0), (0.8, 1.0), (2.0, 1.0)] {
                let d = kernel_minus_power(dim, lambda, r, s).unwrap();
                let k = kernel_gegenbauer_oracle(dim, lambda, r, s).unwrap() - s.powf(lambda);
                if r > 1e-3 {
                    assert!(rel(d, k) < 1e-9, "N={dim} l={lambda} r={r}: {d} vs {k}");
                }
                assert!(d > 0.0 || lambda < 2.0);
            }
            // (K - s^lambda) / r^2 is finite as r -> 0
            let a = kernel_minus_power(dim, lambda, 1e-6, 1.0).unwrap() / 1e-12;
            let b = kernel_minus_power(dim, lambda, 1e-4, 1.0).unwrap() / 1e-8;
            assert!(rel(a, b) < 1e-6);
        }
    }

    #[test]
    fn kernel_method_parsing() {
        for m in KernelEvalMethod::ALL {
            assert_eq!(m.name().parse::<KernelEvalMethod>().unwrap(), m);
        }
        assert!("bogus".parse::<KernelEvalMethod>().is_err());
    }

    proptest! {
        #[test]
        fn kernel_symmetric(dim in 2usize..8, lambda in 0.3f64..11.0, r in 0.0f64..5.0, s in 0.0f64..5.0) {
            let m = KernelEvalMethod::preferred(dim, lambda);
            let a = kernel_k(dim, lambda, r, s, m).unwrap();
            let b = kernel_k(dim, lambda, s, r, m).unwrap();
            prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300));
        }

        #[test]
        fn kernel_homogeneous(dim in 2usize..8, lambda in 0.3f64..11.0, r in 0.01f64..5.0, s in 0.01f64..5.0) {
            for m in [KernelEvalMethod::preferred(dim, lambda), KernelEvalMethod::Hypergeometric] {
                let base = kernel_k(dim, lambda, r, s, m).unwrap();
                for t in [0.5, 2.0, 10.0] {
                    let scaled = kernel_k(dim, lambda, t * r, t * s, m).unwrap();
                    prop_assert!(rel(scaled, t.powf(lambda) * base) < 1e-12);
                }
            }
        }

        #[test]
        fn kernel_at_least_larger_radius_power(dim in 2usize..8, lambda in 2.0f64..11.0, r in 0.01f64..5.0, s in 0.01f64..5.0) {
            let k = kernel_k(dim, lambda, r, s, KernelEvalMethod::Hypergeometric).unwrap();
            prop_assert!(k >= r.max(s).powf(lambda) * (1.0 - 1e-12));
        }
    }
}
