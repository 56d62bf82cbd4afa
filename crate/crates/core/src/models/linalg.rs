use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `A X = B` for square `A` (n × n, row-major) and `B` (n × m, row-major)
/// by Gaussian elimination with partial pivoting. `A` and `B` are consumed.
///
/// Returns [`Error::Singular`] when a pivot falls below `1e3 · n · ε · max|A|`.
pub fn solve<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, n: usize, m: usize) -> Result<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * m);
    let scale = a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tol = scale * T::epsilon() * T::of(1e3 * n as f64);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).expect("finite"))
            .expect("non-empty range");
        if !(a[pivot * n + col].abs() > tol) {
            return Err(Error::Singular);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            for k in 0..m {
                b.swap(pivot * m + k, col * m + k);
            }
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                a[row * n + k] = a[row * n + k] - f * a[col * n + k];
            }
            for k in 0..m {
                b[row * m + k] = b[row * m + k] - f * b[col * m + k];
            }
        }
    }
    for col in (0..n).rev() {
        let p = a[col * n + col];
        for k in 0..m {
            let mut acc = b[col * m + k];
            for j in col + 1..n {
                acc = acc - a[col * n + j] * b[j * m + k];
            }
            b[col * m + k] = acc / p;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [[2,1],[1,3]] x = [3,5] → x = [0.8, 1.4]
        let x = solve(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2, 1).unwrap();
        assert!((x[0] - 0.8f64).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn needs_pivoting() {
        let x = solve(vec![0.0, 1.0, 1.0, 0.0], vec![2.0, 7.0, 3.0, 9.0], 2, 2).unwrap();
        assert_eq!(x, vec![3.0, 9.0, 2.0, 7.0]);
    }

    #[test]
    fn singular() {
        assert!(matches!(solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0], 2, 1), Err(Error::Singular)));
        assert!(matches!(solve::<f64>(vec![0.0; 4], vec![0.0; 2], 2, 1), Err(Error::Singular)));
    }
}
