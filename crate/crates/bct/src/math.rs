//! Small numeric helpers shared by the probability recursions.

/// Numerically stable `log(exp(a) + exp(b))`.
#[inline]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Stable `log(1 - exp(x))` for `x <= 0`.
#[inline]
pub fn log1m_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct() {
        let cases: [(f64, f64); 4] = [(0.0, 0.0), (-700.0, -701.0), (-3.0, 1.5), (-1e4, -1e4)];
        for (a, b) in cases {
            let direct = (a.exp() + b.exp()).ln();
            let stable = log_sum_exp(a, b);
            if direct.is_finite() {
                assert!((stable - direct).abs() < 1e-12, "{a} {b}");
            }
        }
        // far apart: the small term is absorbed
        assert_eq!(log_sum_exp(0.0, -800.0), 0.0);
        assert_eq!(log_sum_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }

    #[test]
    fn log1m_exp_is_stable_near_zero() {
        let x = -1e-12;
        // 1 - exp(-1e-12) = 1e-12 to first order
        assert!((log1m_exp(x) - (1e-12f64).ln()).abs() < 1e-3);
        let x = -50.0;
        assert!((log1m_exp(x) - (1.0 - x.exp()).ln()).abs() < 1e-15);
    }
}
