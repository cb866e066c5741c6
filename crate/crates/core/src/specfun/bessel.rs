//! Spherical Bessel functions of the first and second kind and the
//! spherical Hankel function of the first kind.
//!
//! `j_n` is evaluated by upward recurrence when the argument exceeds the
//! highest requested order and by Miller's downward recurrence otherwise,
//! normalised against the closed forms of `j_0` / `j_1`. `y_n` is always
//! stable upwards.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this argument the leading power-series terms are used directly.
const SMALL_ARG: f64 = 1e-6;

/// Rescale threshold for the downward recurrence.
const RESCALE: f64 = 1e250;

/// `j_n(x)` for a single order.
pub fn spherical_bessel_j(n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("negative Bessel order {n}")));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!("non-finite Bessel argument {x}")));
    }
    Ok(spherical_bessel_j_seq(n as usize, x)[n as usize])
}

/// `j_0(x) ..= j_nmax(x)`.
///
/// Negative arguments use the parity relation `j_n(-x) = (-1)^n j_n(x)`.
pub fn spherical_bessel_j_seq(nmax: usize, x: f64) -> Vec<f64> {
    if x < 0.0 {
        let mut out = spherical_bessel_j_seq(nmax, -x);
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
        return out;
    }
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < SMALL_ARG {
        // j_n(x) ≈ x^n / (2n+1)!! · (1 − x²/(2(2n+3)))
        let mut lead = 1.0;
        for (n, v) in out.iter_mut().enumerate() {
            if n > 0 {
                lead *= x / (2 * n + 1) as f64;
            }
            *v = lead * (1.0 - x * x / (2.0 * (2 * n + 3) as f64));
        }
        return out;
    }

    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x > nmax as f64 {
        out[0] = j0;
        if nmax >= 1 {
            out[1] = j1;
        }
        for n in 1..nmax {
            out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        }
        return out;
    }

    // Miller: start well above both nmax and x, recur downwards with
    // arbitrary seed values, then normalise.
    let start = nmax + (x.ceil() as usize) + 20 + (2.0 * (nmax as f64 + x).sqrt()) as usize * 2;
    let mut next = 0.0_f64; // j_{n+1}
    let mut cur = 1e-300_f64; // j_n
    for n in (0..=start).rev() {
        if n <= nmax {
            out[n] = cur;
        }
        if n == 0 {
            break;
        }
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
    }
    // Normalise with whichever of j_0, j_1 is farther from a zero.
    let scale = if j0.abs() >= j1.abs() || nmax == 0 {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// `y_0(x) ..= y_nmax(x)`; `x` must be positive.
pub fn spherical_bessel_y_seq(nmax: usize, x: f64) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let (s, c) = x.sin_cos();
    let mut out = vec![0.0; nmax + 1];
    out[0] = -c / x;
    if nmax >= 1 {
        out[1] = -c / (x * x) - s / x;
    }
    for n in 1..nmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    out
}

/// `y_n(x)` for a single order.
pub fn spherical_bessel_y(n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("negative Bessel order {n}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "spherical Neumann function is singular at x = {x}"
        )));
    }
    Ok(spherical_bessel_y_seq(n as usize, x)[n as usize])
}

/// `h_n(x) = j_n(x) + i y_n(x)`, orders `0 ..= nmax`.
pub fn spherical_hankel_h1_seq(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "spherical Hankel function is singular at x = {x}"
        )));
    }
    let j = spherical_bessel_j_seq(nmax, x);
    let y = spherical_bessel_y_seq(nmax, x);
    Ok(j.into_iter()
        .zip(y)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// `h_n(x)` for a single order.
pub fn spherical_hankel_h1(n: i64, x: f64) -> Result<Complex64> {
    if n < 0 {
        return Err(Error::domain(format!("negative Hankel order {n}")));
    }
    Ok(spherical_hankel_h1_seq(n as usize, x)?[n as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Power series `j_n(x) = x^n Σ_k (−x²/2)^k / (k! (2n+2k+1)!!)`.
    fn series_j(n: usize, x: f64) -> f64 {
        let mut dfact = 1.0;
        for i in 1..=n {
            dfact *= (2 * i + 1) as f64;
        }
        let mut term = x.powi(n as i32) / dfact;
        let mut sum = term;
        for k in 1..200 {
            term *= -x * x / (2.0 * k as f64 * (2 * n + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }

    #[test]
    fn trivial_values() {
        assert!(spherical_bessel_j(0, PI).unwrap().abs() < 1e-12);
        assert_eq!(spherical_bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(spherical_bessel_j(3, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            spherical_bessel_j(1, 0.1).unwrap(),
            0.033300011902557569726,
            max_relative = 1e-12
        );
    }

    #[test]
    fn negative_order_is_rejected() {
        assert!(matches!(spherical_bessel_j(-1, 1.0), Err(Error::Domain(_))));
        assert!(spherical_hankel_h1(-2, 1.0).is_err());
    }

    #[test]
    fn hankel_closed_forms() {
        let h = spherical_hankel_h1(0, 1.0).unwrap();
        // −i e^{i}
        assert_relative_eq!(h.re, 1.0_f64.sin(), epsilon = 1e-14);
        assert_relative_eq!(h.im, -1.0_f64.cos(), epsilon = 1e-14);

        let h = spherical_hankel_h1(0, PI).unwrap();
        assert!(h.re.abs() < 1e-15);
        assert_relative_eq!(h.im, 1.0 / PI, epsilon = 1e-14);

        // j₂(5), y₂(5) from the trigonometric closed forms.
        let x = 5.0_f64;
        let (s, c) = x.sin_cos();
        let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
        let y2 = -(3.0 / (x * x) - 1.0) * c / x - 3.0 * s / (x * x);
        let h = spherical_hankel_h1(2, 5.0).unwrap();
        assert_relative_eq!(h.re, j2, max_relative = 1e-10);
        assert_relative_eq!(h.im, y2, max_relative = 1e-10);
        assert_relative_eq!(h.re, 0.13473121008512521879, max_relative = 1e-12);
        assert_relative_eq!(h.im, 0.16499545760110443881, max_relative = 1e-12);
    }

    #[test]
    fn hankel_is_singular_at_zero() {
        assert!(matches!(spherical_hankel_h1(0, 0.0), Err(Error::Domain(_))));
        assert!(spherical_hankel_h1(1, -1.0).is_err());
    }

    #[test]
    fn reference_values() {
        // 40-digit reference evaluations via J_{n+1/2}.
        let cases: &[(i64, f64, f64, f64)] = &[
            (0, 50.0, -0.0052474970740785757183, -0.019299320569842265481),
            (5, 0.5, 2.9774668754574455816e-6, -61327.563166980636195),
            (10, 3.0, 3.5260038931752563332e-6, -4699.8591888113912008),
            (20, 7.5, 1.245006950116147195e-8, -280735.41395771361938),
            (30, 1.0, 5.5668312669813471501e-43, -2.9464285474967824617e+40),
            (30, 100.0, 0.0087006285144475758186, -0.0054129293488705718549),
            (25, 40.0, 0.0072759138991612374701, 0.027522651331561769723),
            (3, 99.5, 0.0056776474411418988326, -0.0082965734732579871135),
            (15, 15.0, 0.047692206012290756249, -0.12038050703657748394),
            (12, 80.0, -0.0081456778050019470477, -0.0095831769927638470494),
            (29, 29.5, 0.033400235454995376383, -0.05786756115955142441),
            (8, 0.01, 2.9019560495399607739e-24, -2.0270317567629933899e+24),
        ];
        for &(n, x, j, y) in cases {
            assert_relative_eq!(spherical_bessel_j(n, x).unwrap(), j, max_relative = 1e-10);
            assert_relative_eq!(spherical_bessel_y(n, x).unwrap(), y, max_relative = 1e-10);
        }
    }

    #[test]
    fn matches_power_series_for_moderate_arguments() {
        for n in 0..=30 {
            for &x in &[0.05, 0.3, 1.0, 2.5, 4.0, 7.0] {
                let want = series_j(n, x);
                let got = spherical_bessel_j_seq(n, x)[n];
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn sequence_agrees_with_single_order() {
        let seq = spherical_bessel_j_seq(12, 4.2);
        for (n, v) in seq.iter().enumerate() {
            assert_relative_eq!(*v, spherical_bessel_j(n as i64, 4.2).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn three_term_recurrence() {
        for n in 1..=20usize {
            for i in 0..50 {
                let x = 0.1 + i as f64 * (50.0 - 0.1) / 49.0;
                let j = spherical_bessel_j_seq(n + 1, x);
                let lhs = j[n - 1] + j[n + 1];
                let rhs = (2 * n + 1) as f64 / x * j[n];
                let scale = lhs.abs().max(rhs.abs()).max(j[n - 1].abs());
                assert!((lhs - rhs).abs() <= 1e-9 * scale, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn cross_product_identity() {
        // j_n y_{n-1} − j_{n-1} y_n = 1/x²
        for n in 1..=20usize {
            for i in 0..40 {
                let x = 0.2 + i as f64 * 1.2;
                let j = spherical_bessel_j_seq(n, x);
                let y = spherical_bessel_y_seq(n, x);
                let w = j[n] * y[n - 1] - j[n - 1] * y[n];
                assert_relative_eq!(w, 1.0 / (x * x), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn small_argument_branch_is_continuous() {
        for n in 0..6 {
            let below = spherical_bessel_j_seq(n, 0.999 * SMALL_ARG)[n];
            let above = spherical_bessel_j_seq(n, 1.001 * SMALL_ARG)[n];
            if n == 0 {
                assert_relative_eq!(below, above, max_relative = 1e-9);
            } else {
                assert_relative_eq!(below / above, (0.999_f64 / 1.001).powi(n as i32), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = spherical_bessel_j_seq(15, 3.3);
        let b = spherical_bessel_j_seq(15, 3.3);
        assert_eq!(a, b);
    }
}
