use num_complex::Complex64 as C64;

/// Solves `a x = b` for a small real matrix and complex right-hand side by
/// Gaussian elimination with partial pivoting. Returns `None` when a pivot
/// vanishes relative to the matrix scale.
pub(crate) fn solve_pivoted(a: &[Vec<f64>], b: &[C64]) -> Option<Vec<C64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<C64> = b.to_vec();
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            let xc = x[col];
            x[row] -= xc * factor;
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for k in row + 1..n {
            acc -= x[k] * m[row][k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Largest component of `a x - b` relative to the largest of `b`.
pub(crate) fn relative_residual(a: &[Vec<f64>], x: &[C64], b: &[C64]) -> f64 {
    let bmax = b.iter().fold(0.0f64, |s, z| s.max(z.norm())).max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(row, &bi)| {
            let ax: C64 = row.iter().zip(x).map(|(&r, &xi)| xi * r).sum();
            (ax - bi).norm()
        })
        .fold(0.0, f64::max)
        / bmax
}
