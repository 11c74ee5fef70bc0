//! Dense column-major kernels used by the supernodal factorization.

const PANEL: usize = 64;
const UPDATE_BLOCK: usize = 256;

/// In-place partial Cholesky of the leading `k` columns of the symmetric
/// column-major `m x m` matrix `a` (lower triangle referenced).
///
/// On return columns `0..k` hold `[L11; L21]` and the trailing lower block
/// holds the Schur complement `A22 - L21 L21^T`. On failure returns the local
/// pivot index and its value.
pub fn partial_cholesky(a: &mut [f64], m: usize, k: usize) -> Result<(), (usize, f64)> {
    debug_assert!(a.len() >= m * m && k <= m);
    let mut j0 = 0;
    while j0 < k {
        let j1 = (j0 + PANEL).min(k);
        factor_panel(a, m, j0, j1)?;
        trailing_update(a, m, j0, j1);
        j0 = j1;
    }
    Ok(())
}

fn factor_panel(a: &mut [f64], m: usize, j0: usize, j1: usize) -> Result<(), (usize, f64)> {
    for j in j0..j1 {
        let d = a[j + j * m];
        if !(d > 0.0) || !d.is_finite() {
            return Err((j, d));
        }
        let l = d.sqrt();
        a[j + j * m] = l;
        let inv = 1.0 / l;
        for v in &mut a[j + 1 + j * m..(j + 1) * m] {
            *v *= inv;
        }
        for c in j + 1..j1 {
            let f = a[c + j * m];
            if f == 0.0 {
                continue;
            }
            let (left, right) = a.split_at_mut(c * m);
            let src = &left[c + j * m..(j + 1) * m];
            let dst = &mut right[c..m];
            for (d, s) in dst.iter_mut().zip(src) {
                *d -= f * s;
            }
        }
    }
    Ok(())
}

/// `A[c0.., c0..c1] -= P[c0..] P[c0..c1]^T` for column blocks right of the panel.
fn trailing_update(a: &mut [f64], m: usize, j0: usize, j1: usize) {
    let kk = j1 - j0;
    let mut c0 = j1;
    while c0 < m {
        let c1 = (c0 + UPDATE_BLOCK).min(m);
        let rows = m - c0;
        let cols = c1 - c0;
        let ptr = a.as_mut_ptr();
        // SAFETY: the panel columns j0..j1 and the updated columns c0..c1 are
        // disjoint column ranges of `a` (c0 >= j1), all offsets lie inside the
        // m*m buffer, and dgemm only writes through the C pointer.
        unsafe {
            let p = ptr.add(c0 + j0 * m) as *const f64;
            let c = ptr.add(c0 + c0 * m);
            matrixmultiply::dgemm(
                rows, kk, cols, -1.0, p, 1, m as isize, p, m as isize, 1, 1.0, c, 1, m as isize,
            );
        }
        c0 = c1;
    }
}

/// Solves `L y = b` in place for the lower-triangular leading `k x k` block
/// of a column-major matrix with leading dimension `ld`.
pub fn forward_substitute(l: &[f64], ld: usize, k: usize, b: &mut [f64]) {
    for j in 0..k {
        let x = b[j] / l[j + j * ld];
        b[j] = x;
        if x != 0.0 {
            for i in j + 1..k {
                b[i] -= l[i + j * ld] * x;
            }
        }
    }
}

/// Solves `L^T x = b` in place, same layout as [`forward_substitute`].
pub fn backward_substitute(l: &[f64], ld: usize, k: usize, b: &mut [f64]) {
    for j in (0..k).rev() {
        let mut acc = b[j];
        for i in j + 1..k {
            acc -= l[i + j * ld] * b[i];
        }
        b[j] = acc / l[j + j * ld];
    }
}

/// Dense symmetric positive-definite solve by full Cholesky (reference path).
pub fn dense_spd_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m = vec![0.0; n * n];
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[i + j * n] = v;
        }
    }
    partial_cholesky(&mut m, n, n).ok()?;
    let mut x = b.to_vec();
    forward_substitute(&m, n, n, &mut x);
    backward_substitute(&m, n, n, &mut x);
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|p| g[i][p] * g[j][p]).sum::<f64>() + if i == j { n as f64 } else { 0.0 };
            }
        }
        a
    }

    #[test]
    fn blocked_factor_solves_large_system() {
        // larger than one panel and one update block so every path runs
        let n = 300;
        let a = random_spd(n, 7);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * x_true[j]).sum()).collect();
        let x = dense_spd_solve(&a, &b).unwrap();
        let err = x.iter().zip(&x_true).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "max error {err}");
    }

    #[test]
    fn partial_factor_leaves_schur_complement() {
        let n = 90;
        let k = 70;
        let a = random_spd(n, 3);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i + j * n] = a[i][j];
            }
        }
        partial_cholesky(&mut m, n, k).unwrap();
        // Schur complement S = A22 - A21 A11^-1 A12, checked column by column.
        let a11: Vec<Vec<f64>> = (0..k).map(|i| a[i][..k].to_vec()).collect();
        for c in k..n {
            let rhs: Vec<f64> = (0..k).map(|i| a[i][c]).collect();
            let y = dense_spd_solve(&a11, &rhs).unwrap();
            for r in c..n {
                let s = a[r][c] - (0..k).map(|i| a[r][i] * y[i]).sum::<f64>();
                assert!((s - m[r + c * n]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn indefinite_matrix_reports_pivot() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let mut m = vec![1.0, 2.0, 2.0, 1.0];
        assert_eq!(partial_cholesky(&mut m, 2, 2).unwrap_err().0, 1);
        assert!(dense_spd_solve(&a, &[1.0, 1.0]).is_none());
    }
}
