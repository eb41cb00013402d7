//! The unbiased pass@k estimator.
//!
//! `pass@k = 1 - prod_{i=n-c+1}^{n} (1 - k/i)`, or 1 when `n - c < k`.
//! Small `n` is evaluated with exact rationals, larger `n` in log space.

use num_rational::Ratio;

use super::EvalError;

/// Largest `n` evaluated with exact rational arithmetic.
pub const EXACT_LIMIT: usize = 64;

pub fn pass_at_k(n: usize, c: usize, k: usize) -> Result<f64, EvalError> {
    if c > n || k == 0 || k > n {
        return Err(EvalError::InvalidArgs { n, c, k });
    }
    if n - c < k {
        return Ok(1.0);
    }
    if n <= EXACT_LIMIT {
        Ok(exact(n, c, k))
    } else {
        Ok(log_space(n, c, k))
    }
}

fn exact(n: usize, c: usize, k: usize) -> f64 {
    let mut miss = Ratio::<u128>::from_integer(1);
    for i in (n - c + 1)..=n {
        let i = i as u128;
        miss *= Ratio::new(i - k as u128, i);
    }
    let (num, den) = miss.into_raw();
    // 1 - num/den as a single rounding of (den - num)/den
    (den - num) as f64 / den as f64
}

fn log_space(n: usize, c: usize, k: usize) -> f64 {
    let log_miss: f64 = ((n - c + 1)..=n).map(|i| (-(k as f64) / i as f64).ln_1p()).sum();
    -log_miss.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(pass_at_k(200, 200, 1).unwrap(), 1.0);
        assert!((pass_at_k(5, 2, 3).unwrap() - 0.9).abs() < 1e-15);
        assert!((pass_at_k(200, 20, 1).unwrap() - 0.10).abs() < 1e-12);
        assert_eq!(pass_at_k(10, 0, 5).unwrap(), 0.0);
    }

    #[test]
    fn invalid_args() {
        assert!(pass_at_k(5, 6, 1).is_err());
        assert!(pass_at_k(5, 1, 0).is_err());
        assert!(pass_at_k(5, 1, 6).is_err());
    }

    #[test]
    fn exact_and_log_paths_agree_at_the_boundary() {
        for c in 0..=64 {
            for k in [1, 2, 5, 10, 32, 64] {
                if 64 - c < k {
                    continue;
                }
                let e = exact(64, c, k);
                assert!((e - log_space(64, c, k)).abs() < 1e-12, "c={c} k={k}");
            }
        }
    }

    #[test]
    fn log_space_pass_at_one_is_c_over_n() {
        for c in [0, 1, 7, 20, 150, 199] {
            assert!((pass_at_k(200, c, 1).unwrap() - c as f64 / 200.0).abs() < 1e-12);
        }
    }
}
