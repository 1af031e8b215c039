//! Functional calculus on small complex matrices.
//!
//! Everything funnels through the Hermitian eigendecomposition: singular
//! values of `a` are the square roots of the eigenvalues of `a* a`, Schatten
//! norms and PSD square roots follow. Matrices here are small (n ≤ 8), so
//! dense decompositions are the right tool.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{MatrixValue, C64};

/// Relative tolerance used when checking the Hermitian property.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues below `-PSD_TOL * ||a||` are rejected by [`psd_sqrt`].
pub const PSD_TOL: f64 = 1e-8;

/// Largest entry modulus, used as the scale in relative comparisons.
pub fn max_abs(a: &MatrixValue) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Worst entrywise deviation of `a` from `a*`.
pub fn hermitian_violation(a: &MatrixValue) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(a: &MatrixValue, tol: f64) -> bool {
    hermitian_violation(a) <= tol * (1.0 + max_abs(a))
}

/// Hermitian part `(a + a*) / 2`; used to scrub rounding noise off
/// quantities that are Hermitian by construction.
pub fn hermitize(a: &MatrixValue) -> MatrixValue {
    let mut h = a.clone();
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        }
    }
    h
}

/// Eigendecomposition of a Hermitian matrix, `a = V diag(w) V*`.
///
/// Fails with a domain error when `a` is not Hermitian within
/// [`HERMITIAN_TOL`] relative to its largest entry.
pub fn eigh(a: &MatrixValue) -> Result<(Vec<f64>, MatrixValue)> {
    if !is_hermitian(a, HERMITIAN_TOL) {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (violation {:.3e})",
            hermitian_violation(a)
        )));
    }
    let se = hermitize(a).symmetric_eigen();
    Ok((se.eigenvalues.iter().copied().collect(), se.eigenvectors))
}

/// `|a|^2 = a* a`, always PSD Hermitian.
pub fn abs_square(a: &MatrixValue) -> MatrixValue {
    hermitize(&(a.adjoint() * a))
}

/// In-place `acc += w * a* a`, the workhorse of every square function.
pub fn add_scaled_abs_square(acc: &mut MatrixValue, a: &MatrixValue, w: f64) {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                s += a[(k, i)].conj() * a[(k, j)];
            }
            acc[(i, j)] += s * w;
        }
    }
}

/// PSD square root via eigendecomposition; eigenvalues in
/// `[-PSD_TOL * ||a||, 0)` are clipped to zero, anything lower is an error.
pub fn psd_sqrt(a: &MatrixValue) -> Result<MatrixValue> {
    let (w, v) = eigh(a)?;
    let scale = w.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if let Some(&min) = w
        .iter()
        .filter(|&&x| x < -PSD_TOL * scale)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        return Err(Error::NotPsd { min_eig: min });
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        w.len(),
        w.iter().map(|&x| C64::new(x.max(0.0).sqrt(), 0.0)),
    ));
    Ok(hermitize(&(&v * d * v.adjoint())))
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &MatrixValue) -> Vec<f64> {
    // eigh cannot fail on a*a
    let (w, _) = eigh(&abs_square(a)).expect("a*a is Hermitian");
    let mut s: Vec<f64> = w.iter().map(|&x| x.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Schatten p-norm `(Σ σ_i^p)^{1/p}` with the unnormalized trace;
/// `p = ∞` gives the operator norm.
pub fn schatten_norm(a: &MatrixValue, p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Domain(format!(
            "Schatten norm needs p >= 1, got {p}"
        )));
    }
    let sv = singular_values(a);
    if p.is_infinite() {
        return Ok(sv.first().copied().unwrap_or(0.0));
    }
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Operator norm, the largest singular value.
pub fn op_norm(a: &MatrixValue) -> f64 {
    schatten_norm(a, f64::INFINITY).expect("p = inf is valid")
}

/// `tr |a|^p = Σ σ_i^p` (no p-th root); building block for field norms.
pub fn schatten_power_trace(a: &MatrixValue, p: f64) -> f64 {
    singular_values(a).iter().map(|s| s.powf(p)).sum()
}

/// PSD ordering test: `a ≼ b` iff the smallest eigenvalue of `b - a`
/// is at least `-tol * (1 + ||b||_op)`. Inputs must be Hermitian.
pub fn psd_leq(a: &MatrixValue, b: &MatrixValue, tol: f64) -> Result<bool> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "psd_leq: sizes {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    for (name, m) in [("a", a), ("b", b)] {
        if !is_hermitian(m, HERMITIAN_TOL) {
            return Err(Error::Domain(format!("psd_leq: {name} is not Hermitian")));
        }
    }
    let (w, _) = eigh(&(b - a))?;
    let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(min >= -tol * (1.0 + op_norm(b)))
}

/// Identity matrix in M_n.
pub fn identity(n: usize) -> MatrixValue {
    DMatrix::identity(n, n)
}

/// Zero matrix in M_n.
pub fn zero(n: usize) -> MatrixValue {
    DMatrix::zeros(n, n)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;

    /// Standard complex Gaussian entries from an explicit Box-Muller,
    /// keeping the test RNG stream independent of rand_distr.
    pub fn randn_c64<R: Rng>(rng: &mut R) -> C64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        C64::new(
            r * (2.0 * std::f64::consts::PI * u2).cos(),
            r * (2.0 * std::f64::consts::PI * u2).sin(),
        ) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> MatrixValue {
        DMatrix::from_fn(n, n, |_, _| randn_c64(rng))
    }

    pub fn random_psd<R: Rng>(rng: &mut R, n: usize) -> MatrixValue {
        let a = random_matrix(rng, n);
        abs_square(&a)
    }
}
