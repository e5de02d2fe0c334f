//! Polynomial helpers for the general-lambda ansatz.
//!
//! Coefficients are stored lowest degree first.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Horner evaluation of a complex polynomial at a real point.
pub fn eval_complex(coeffs: &[Complex64], u: f64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * u + c)
}

fn eval_at(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a real polynomial, from the companion matrix and
/// polished by Newton's method.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.iter().rposition(|c| *c != 0.0).ok_or_else(|| {
        Error::InvalidParameter("the zero polynomial has no roots".into())
    })?;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let companion = DMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut zs: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    for z in &mut zs {
        for _ in 0..5 {
            let (p, dp) = eval_at(&coeffs[..=deg], *z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            *z -= step;
            if step.norm() <= 1e-16 * z.norm() {
                break;
            }
        }
    }
    Ok(zs)
}

/// Expands `lead * prod_k (u - z_k)`.
pub fn from_roots(lead: Complex64, zs: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![lead];
    for z in zs {
        c.push(Complex64::new(0.0, 0.0));
        for k in (1..c.len()).rev() {
            c[k] = c[k - 1] - z * c[k];
        }
        c[0] = -z * c[0];
    }
    c
}

/// `P` with `|P(u)|^2 = F(u)` for real `u`, for a real polynomial `F` that is
/// positive on the real line.
pub fn factor_positive(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
    let lead = coeffs[deg];
    if deg % 2 == 1 || !(lead > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "polynomial of degree {deg} with leading coefficient {lead} is not positive on the real line"
        )));
    }
    let zs = roots(&coeffs[..=deg])?;
    let mut upper: Vec<Complex64> = zs.into_iter().filter(|z| z.im > 0.0).collect();
    if upper.len() != deg / 2 {
        return Err(Error::InvalidParameter(format!(
            "expected {} roots in the upper half plane, found {}",
            deg / 2,
            upper.len()
        )));
    }
    upper.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(from_roots(Complex64::new(lead.sqrt(), 0.0), &upper))
}

/// `(P(u) - P(1)) / (u - 1)` by synthetic division.
pub fn divide_by_u_minus_one(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len().saturating_sub(1);
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    let mut carry = Complex64::new(0.0, 0.0);
    for k in (1..=d).rev() {
        carry += coeffs[k];
        out[k - 1] = carry;
    }
    out
}
