//! Wigner 3-j symbols for integer angular momenta via the Racah sum.

use std::sync::OnceLock;

/// Largest argument of the log-factorial table; enough for `j1+j2+j3+1`
/// with every `j` up to about 80.
const LOG_FACT_MAX: usize = 256;

fn log_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LOG_FACT_MAX + 1];
        for i in 1..=LOG_FACT_MAX {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    table[n]
}

/// Selection rules shared by every 3-j symbol.
pub fn wigner_3j_allowed(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> bool {
    j1 >= 0
        && j2 >= 0
        && j3 >= 0
        && m1.abs() <= j1
        && m2.abs() <= j2
        && m3.abs() <= j3
        && m1 + m2 + m3 == 0
        && j3 >= (j1 - j2).abs()
        && j3 <= j1 + j2
        && !(m1 == 0 && m2 == 0 && m3 == 0 && (j1 + j2 + j3) % 2 == 1)
}

/// ```text
/// ( j1 j2 j3 )
/// ( m1 m2 m3 )
/// ```
///
/// Returns exactly `0.0` whenever a selection rule fails.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if !wigner_3j_allowed(j1, j2, j3, m1, m2, m3) {
        return 0.0;
    }
    let lf = |n: i64| log_factorial(n as usize);

    let log_triangle = lf(j1 + j2 - j3) + lf(j1 - j2 + j3) + lf(-j1 + j2 + j3) - lf(j1 + j2 + j3 + 1);
    let log_pre = 0.5
        * (log_triangle
            + lf(j1 + m1)
            + lf(j1 - m1)
            + lf(j2 + m2)
            + lf(j2 - m2)
            + lf(j3 + m3)
            + lf(j3 - m3));

    let t_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let t_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let log_den = lf(t)
            + lf(j3 - j2 + t + m1)
            + lf(j3 - j1 + t - m2)
            + lf(j1 + j2 - j3 - t)
            + lf(j1 - t - m1)
            + lf(j2 - t + m2);
        let term = (log_pre - log_den).exp();
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if (j1 - j2 - m3).rem_euclid(2) == 1 {
        -sum
    } else {
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_values() {
        assert_eq!(wigner_3j(0, 0, 0, 0, 0, 0), 1.0);
        assert_relative_eq!(wigner_3j(1, 1, 0, 0, 0, 0), -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0);
        assert_relative_eq!(wigner_3j(1, 1, 2, 0, 0, 0), (2.0 / 15.0f64).sqrt(), epsilon = 1e-15);
        // (1 1 1; 1 −1 0) = 1/√6
        assert_relative_eq!(wigner_3j(1, 1, 1, 1, -1, 0), 1.0 / 6f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn selection_rules_are_exact_zero() {
        assert_eq!(wigner_3j(2, 1, 4, 0, 0, 0), 0.0);
        assert_eq!(wigner_3j(2, 2, 2, 1, 1, 0), 0.0);
        assert_eq!(wigner_3j(1, 1, 1, 2, -2, 0), 0.0);
        assert_eq!(wigner_3j(3, 2, 2, 0, 0, 0), 0.0);
    }

    #[test]
    fn column_swap_sign() {
        for j1 in 0..6 {
            for j2 in 0..6 {
                for j3 in (j1 - j2 as i64).abs()..=(j1 + j2) {
                    for m1 in -j1..=j1 {
                        for m2 in -j2..=j2 {
                            let m3 = -m1 - m2;
                            let a = wigner_3j(j1, j2, j3, m1, m2, m3);
                            let b = wigner_3j(j2, j1, j3, m2, m1, m3);
                            let sign = if (j1 + j2 + j3) % 2 == 0 { 1.0 } else { -1.0 };
                            assert!((b - sign * a).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_over_projections() {
        // Σ_{m1,m2} (2j3+1) (j1 j2 j3; m1 m2 m3)² = 1
        let (j1, j2): (i64, i64) = (7, 5);
        for j3 in 2..=12 {
            for m3 in -j3..=j3 {
                let mut s = 0.0;
                for m1 in -j1..=j1 {
                    let m2 = -m1 - m3;
                    if m2.abs() <= j2 {
                        let w = wigner_3j(j1, j2, j3, m1, m2, m3);
                        s += (2 * j3 + 1) as f64 * w * w;
                    }
                }
                assert_relative_eq!(s, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn moderate_orders_stay_finite() {
        let w = wigner_3j(40, 40, 40, 0, 0, 0);
        assert!(w.is_finite() && w != 0.0);
    }
}
