//! Small dense linear-algebra helpers (Gaussian elimination with partial
//! pivoting). Systems here are tiny (at most a few dozen unknowns), so no
//! external solver is warranted.

/// Solve `A x = b` for square `A` (row-major). Returns `None` when the matrix
/// is singular to working precision.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = m[col][n];
        for k in col + 1..n {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

/// A nonzero kernel vector of the (rows × cols) matrix `a`, or `None` when
/// the kernel is trivial to working precision. Requires cols > rank, which
/// holds whenever cols > rows.
pub fn kernel_vector(a: &[Vec<f64>], cols: usize) -> Option<Vec<f64>> {
    let rows = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut pivot_col_of_row = vec![usize::MAX; rows];
    let mut is_pivot_col = vec![false; cols];
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let best = (row..rows).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[best][col].abs() < 1e-12 {
            continue;
        }
        m.swap(row, best);
        let inv = 1.0 / m[row][col];
        for k in col..cols {
            m[row][k] *= inv;
        }
        for r in 0..rows {
            if r != row && m[r][col].abs() > 0.0 {
                let factor = m[r][col];
                for k in col..cols {
                    m[r][k] -= factor * m[row][k];
                }
            }
        }
        pivot_col_of_row[row] = col;
        is_pivot_col[col] = true;
        row += 1;
    }
    let free_col = (0..cols).find(|&c| !is_pivot_col[c])?;
    let mut v = vec![0.0; cols];
    v[free_col] = 1.0;
    for r in 0..row {
        let pc = pivot_col_of_row[r];
        v[pc] = -m[r][free_col];
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![5.0, 10.0];
        let x = solve(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let v = kernel_vector(&a, 3).unwrap();
        assert!(v.iter().any(|x| x.abs() > 1e-9));
        for row in &a {
            let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-9);
        }
    }
}
