//! Jacobi-preconditioned conjugate gradients.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive-definite `A` to relative residual
/// `tol`, starting from `x` (pass zeros for a cold start).
pub fn pcg_jacobi(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<PcgReport> {
    let n = a.dim();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(PcgReport { iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok(PcgReport { iterations: it, relative_residual: res });
        }
        a.matvec(&p, &mut q);
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if !(pq > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: it, value: pq });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= tol {
        return Ok(PcgReport { iterations: max_iter, relative_residual: res });
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let rep = pcg_jacobi(&a, &b, &mut x, 1e-10, 500).unwrap();
        assert!(rep.relative_residual <= 1e-10);
        let mut r = vec![0.0; n];
        a.matvec(&x, &mut r);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-8));
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let a = CsrMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 100.0), (2, 2, 1e4), (0, 2, 0.5), (2, 0, 0.5)]);
        let mut x = vec![0.0; 3];
        assert!(matches!(pcg_jacobi(&a, &[1.0, 1.0, 1.0], &mut x, 1e-14, 1), Err(Error::NoConvergence { .. })));
    }
}
