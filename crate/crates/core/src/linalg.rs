//! SVD-based pseudoinverse and conditioning on dense complex matrices.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Singular values below `RCOND · σ_max` are discarded.
pub const RCOND: f64 = 1e-10;

const MAX_SVD_ITERATIONS: usize = 100_000;

fn svd(a: &CMatrix, vectors: bool, context: &str) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numerical {
            context: context.into(),
            detail: "matrix has non-finite entries".into(),
        });
    }
    SVD::try_new(a.clone(), vectors, vectors, f64::EPSILON, MAX_SVD_ITERATIONS).ok_or_else(|| Error::Numerical {
        context: context.into(),
        detail: format!("SVD of {}x{} matrix did not converge", a.nrows(), a.ncols()),
    })
}

/// Moore–Penrose pseudoinverse with singular values below `rcond · σ_max`
/// treated as zero. Also returns the retained rank.
pub fn pseudo_inverse(a: &CMatrix, rcond: f64, context: &str) -> Result<(CMatrix, usize)> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok((CMatrix::zeros(n, m), 0));
    }
    let dec = svd(a, true, context)?;
    let u = dec.u.as_ref().expect("requested");
    let vt = dec.v_t.as_ref().expect("requested");
    let smax = dec.singular_values.max();
    let cutoff = rcond * smax;
    let mut out = CMatrix::zeros(n, m);
    let mut rank = 0;
    for (i, &s) in dec.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        rank += 1;
        // out += v_i · (1/s) · u_iᴴ
        let vi = vt.row(i).adjoint();
        let ui = u.column(i).adjoint() / Complex64::new(s, 0.0);
        out += vi * ui;
    }
    Ok((out, rank))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &CMatrix, context: &str) -> Result<Vec<f64>> {
    let dec = svd(a, false, context)?;
    let mut s: Vec<f64> = dec.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `σ_max / σ_min` over the `min(rows, cols)` singular values;
/// `f64::INFINITY` when the matrix is numerically rank deficient.
pub fn condition_number(a: &CMatrix, context: &str) -> Result<f64> {
    let s = singular_values(a, context)?;
    let (smax, smin) = match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) => (hi, lo),
        _ => return Ok(f64::INFINITY),
    };
    let tiny = smax * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    if smax == 0.0 || smin <= tiny {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}

/// `‖A·x − b‖₂`.
pub fn residual(a: &CMatrix, x: &CVector, b: &CVector) -> f64 {
    (a * x - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn penrose_conditions() {
        for &(m, n) in &[(7, 4), (4, 7), (6, 6)] {
            let a = random(m, n, (m * 10 + n) as u64);
            let (p, rank) = pseudo_inverse(&a, RCOND, "test").unwrap();
            assert_eq!(rank, m.min(n));
            assert!((&a * &p * &a - &a).norm() < 1e-12);
            assert!((&p * &a * &p - &p).norm() < 1e-12);
            let ap = &a * &p;
            assert!((ap.adjoint() - &ap).norm() < 1e-12);
            let pa = &p * &a;
            assert!((pa.adjoint() - &pa).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_cutoff() {
        let a = random(6, 2, 1);
        let b = random(2, 6, 2);
        let low = &a * &b;
        let (_, rank) = pseudo_inverse(&low, RCOND, "test").unwrap();
        assert_eq!(rank, 2);
        assert_eq!(condition_number(&low, "test").unwrap(), f64::INFINITY);
    }

    #[test]
    fn conditioning_examples() {
        let d = CMatrix::from_diagonal(&CVector::from_element(5, Complex64::new(2.0, 0.0)));
        assert!((condition_number(&d, "test").unwrap() - 1.0).abs() < 1e-14);
        let a = random(8, 5, 3);
        let k1 = condition_number(&a, "test").unwrap();
        let k2 = condition_number(&(&a * Complex64::new(-3.0, 7.0)), "test").unwrap();
        assert!((k1 - k2).abs() < 1e-10 * k1);
        assert_eq!(condition_number(&CMatrix::zeros(3, 3), "test").unwrap(), f64::INFINITY);
    }

    #[test]
    fn non_finite_is_numerical_error() {
        let mut a = random(3, 3, 4);
        a[(1, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(pseudo_inverse(&a, RCOND, "here"), Err(Error::Numerical { .. })));
    }

    #[test]
    fn residual_of_exact_solve() {
        let a = random(5, 5, 5);
        let x = CVector::from_fn(5, |i, _| Complex64::new(i as f64, 1.0));
        let b = &a * &x;
        let (p, _) = pseudo_inverse(&a, RCOND, "test").unwrap();
        assert!(residual(&a, &(&p * &b), &b) < 1e-12);
    }
}
