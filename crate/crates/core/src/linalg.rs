//! Small dense linear-algebra helpers.

/// Solve the square system `a x = b` (row-major `a`, size `n x n`) by Gaussian
/// elimination with partial pivoting. Returns `None` if a pivot falls below `tol`.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize, tol: f64) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let piv =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < tol {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for k in r + 1..n {
            acc -= a[r * n + k] * x[k];
        }
        x[r] = acc / a[r * n + r];
    }
    Some(x)
}

/// Numerical rank of a row-major `rows x cols` matrix.
pub fn rank(mut a: Vec<f64>, rows: usize, cols: usize, tol: f64) -> usize {
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) =
            (r..rows).max_by(|&i, &j| a[i * cols + col].abs().total_cmp(&a[j * cols + col].abs()))
        else {
            break;
        };
        if a[piv * cols + col].abs() < tol {
            continue;
        }
        for k in 0..cols {
            a.swap(piv * cols + k, r * cols + k);
        }
        for i in r + 1..rows {
            let f = a[i * cols + col] / a[r * cols + col];
            for k in col..cols {
                a[i * cols + k] -= f * a[r * cols + k];
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_2x2() {
        let x = solve_dense(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2, 1e-12).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn singular_is_none() {
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0], 2, 1e-12).is_none());
    }

    #[test]
    fn rank_counts_independent_rows() {
        assert_eq!(rank(vec![1.0, 2.0, 2.0, 4.0, 0.0, 1.0], 3, 2, 1e-10), 2);
        assert_eq!(rank(vec![1.0, 1.0, 2.0, 2.0], 2, 2, 1e-10), 1);
    }
}
