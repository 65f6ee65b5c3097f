//! Symmetric sparse matrices in compressed row storage, a conjugate
//! gradient solver, and extreme-eigenvalue estimation by power and inverse
//! iteration.

use alloc::vec;
use alloc::vec::Vec;

// Inherent f64 math appears once any crate in the graph links std; the
// trait import is what keeps the pure no_std build working.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fixed seeds so repeated runs produce identical iterates.
const POWER_SEED: u64 = 0x00c0ffee;
const INVERSE_SEED: u64 = 0x00c0ffef;

/// Symmetric sparse matrix in CSR form; stores both triangles.
#[derive(Debug, Clone)]
pub struct SymmetricSparse {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricSparse {
    /// Builds from (row, col, value) triplets, accumulating duplicates.
    ///
    /// Duplicates are summed in insertion order after a stable sort by
    /// (row, col); since element loops emit the (i, j) and (j, i) entries
    /// with identical values in identical order, the assembled matrix is
    /// exactly symmetric.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            assert!(r < n && c < n, "triplet index out of range");
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0; n + 1];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for &(r, c, v) in &sorted {
            if col_indices.len() > row_offsets[r]
                && row_offsets[r + 1] == col_indices.len()
                && col_indices.last() == Some(&c)
            {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] = col_indices.len();
            }
        }
        // Rows without entries inherit the previous offset.
        for r in 0..n {
            if row_offsets[r + 1] < row_offsets[r] {
                row_offsets[r + 1] = row_offsets[r];
            }
        }
        Self {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as (column, value) pairs, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                if c == i {
                    d[i] = v;
                }
            }
        }
        d
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for (c, v) in self.row(i) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// Symmetric diagonal congruence D A D.
    pub fn scale_symmetric(&self, d: &[f64]) -> Result<SymmetricSparse> {
        if d.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: d.len(),
            });
        }
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                out.values[k] = d[i] * self.values[k] * d[self.col_indices[k]];
            }
        }
        Ok(out)
    }

    /// Largest |A_ij - A_ji|; zero for exactly symmetric matrices.
    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let mut vt = 0.0;
                for (c, w) in self.row(j) {
                    if c == i {
                        vt = w;
                    }
                }
                worst = worst.max((v - vt).abs());
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradient output.
#[derive(Debug, Clone)]
pub struct CgResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Final true residual norm ||b - A x||.
    pub residual: f64,
}

/// Conjugate gradients for symmetric positive definite systems.
///
/// Succeeds once `||b - A x|| <= rel_tol * ||b||` (verified against the
/// true residual, not just the recurrence). Directions with non-positive
/// curvature abort with [`Error::NotSpd`]; an exhausted iteration budget
/// returns [`Error::NoConvergence`] carrying the best iterate.
pub fn cg_solve(
    a: &SymmetricSparse,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgResult> {
    if b.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.len(),
        });
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "rel_tol",
            value: rel_tol,
        });
    }
    let norm_b = norm(b);
    if norm_b == 0.0 {
        return Ok(CgResult {
            solution: vec![0.0; a.n()],
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = rel_tol * norm_b;

    let mut x = vec![0.0; a.n()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut best = (x.clone(), norm_b);

    for it in 1..=max_iter {
        let ap = a.matvec(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotSpd);
        }
        let alpha = rr / pap;
        for k in 0..x.len() {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            // Confirm with the true residual; the recurrence can drift.
            let ax = a.matvec(&x)?;
            let true_r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let true_norm = norm(&true_r);
            if true_norm <= target {
                return Ok(CgResult {
                    solution: x,
                    iterations: it,
                    residual: true_norm,
                });
            }
            if true_norm < best.1 {
                best = (x.clone(), true_norm);
            }
            r = true_r;
            rr = dot(&r, &r);
            p = r.clone();
            continue;
        }
        if rr_new.sqrt() < best.1 {
            best = (x.clone(), rr_new.sqrt());
        }
        let beta = rr_new / rr;
        for k in 0..p.len() {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }

    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: best.1,
        best: best.0,
    })
}

fn random_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm(&v);
    for x in &mut v {
        *x /= nv;
    }
    v
}

const EIG_MAX_OUTER: usize = 200_000;

/// Extreme eigenvalues (lambda_min, lambda_max) of a symmetric positive
/// definite matrix.
///
/// lambda_max comes from power iteration, lambda_min from inverse iteration
/// with conjugate-gradient inner solves; both stop when the Rayleigh
/// quotient changes by at most `tol` relatively. Inner solves that stall at
/// the accuracy attainable for very ill-conditioned matrices are accepted
/// once their residual is small enough not to bias the Rayleigh quotient.
pub fn extreme_eigs(a: &SymmetricSparse, tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "tol",
            value: tol,
        });
    }
    let n = a.n();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }

    // Power iteration for the top of the spectrum.
    let mut v = random_unit_vector(n, POWER_SEED);
    let mut lambda_max = 0.0;
    let mut prev = f64::INFINITY;
    for _ in 0..EIG_MAX_OUTER {
        let av = a.matvec(&v)?;
        lambda_max = dot(&v, &av);
        let nav = norm(&av);
        if nav == 0.0 {
            break;
        }
        for k in 0..n {
            v[k] = av[k] / nav;
        }
        if (lambda_max - prev).abs() <= tol * lambda_max.abs() {
            break;
        }
        prev = lambda_max;
    }

    // Inverse iteration for the bottom.
    let inner_tol = (tol * 1e-2).clamp(1e-12, 1e-8);
    let inner_iter = 50 * n + 1000;
    let mut y = random_unit_vector(n, INVERSE_SEED);
    let mut lambda_min = lambda_max;
    let mut prev = f64::INFINITY;
    for _ in 0..EIG_MAX_OUTER {
        let z = match cg_solve(a, &y, inner_tol, inner_iter) {
            Ok(res) => res.solution,
            // Ill-conditioned matrices stop CG short of inner_tol; a
            // residual this small still leaves the Rayleigh quotient
            // accurate far beyond `tol`.
            Err(Error::NoConvergence { residual, best, .. }) if residual <= 1e-4 => {
                log::warn!(
                    "inverse iteration accepts inexact solve (residual {residual:e})"
                );
                best
            }
            Err(e) => return Err(e),
        };
        let nz = norm(&z);
        if nz == 0.0 {
            break;
        }
        for k in 0..n {
            y[k] = z[k] / nz;
        }
        let ay = a.matvec(&y)?;
        lambda_min = dot(&y, &ay);
        if (lambda_min - prev).abs() <= tol * lambda_min.abs() {
            break;
        }
        prev = lambda_min;
    }

    Ok((lambda_min, lambda_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(values: &[f64]) -> SymmetricSparse {
        let triplets: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, v))
            .collect();
        SymmetricSparse::from_triplets(values.len(), &triplets)
    }

    fn tridiag(n: usize) -> SymmetricSparse {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SymmetricSparse::from_triplets(n, &t)
    }

    #[test]
    fn matvec_identity_and_diag() {
        let id = diag(&[1.0, 1.0, 1.0]);
        let x = vec![0.3, -0.7, 2.0];
        assert_eq!(id.matvec(&x).unwrap(), x);
        let d = diag(&[1.0, 4.0]);
        assert_eq!(d.matvec(&[1.0, 1.0]).unwrap(), vec![1.0, 4.0]);
        assert!(d.matvec(&[1.0]).is_err());
    }

    #[test]
    fn duplicate_triplets_accumulate() {
        let a = SymmetricSparse::from_triplets(
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (0, 0, 3.0), (1, 0, 2.0), (1, 1, 1.0)],
        );
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.matvec(&[1.0, 1.0]).unwrap(), vec![6.0, 3.0]);
    }

    #[test]
    fn cg_identity_one_step() {
        let id = diag(&[1.0; 5]);
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let res = cg_solve(&id, &b, 1e-14, 10).unwrap();
        assert_eq!(res.iterations, 1);
        for (x, e) in res.solution.iter().zip(&b) {
            assert_relative_eq!(x, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn cg_two_by_two() {
        let a = SymmetricSparse::from_triplets(
            2,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        );
        let res = cg_solve(&a, &[1.0, 2.0], 1e-14, 10).unwrap();
        assert_relative_eq!(res.solution[0], 1.0 / 11.0, epsilon = 1e-12);
        assert_relative_eq!(res.solution[1], 7.0 / 11.0, epsilon = 1e-12);
    }

    #[test]
    fn cg_residual_bound_holds() {
        let a = tridiag(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let res = cg_solve(&a, &b, 1e-14, 500).unwrap();
        let ax = a.matvec(&res.solution).unwrap();
        let r: Vec<f64> = b.iter().zip(&ax).map(|(x, y)| x - y).collect();
        assert!(norm(&r) <= 1e-14 * norm(&b));
    }

    #[test]
    fn cg_detects_indefiniteness() {
        let a = diag(&[1.0, -1.0]);
        let err = cg_solve(&a, &[0.0, 1.0], 1e-10, 10);
        assert!(matches!(err, Err(Error::NotSpd)));
    }

    #[test]
    fn cg_reports_nonconvergence() {
        let a = tridiag(100);
        let b = vec![1.0; 100];
        let err = cg_solve(&a, &b, 1e-14, 3);
        match err {
            Err(Error::NoConvergence { residual, best, .. }) => {
                assert!(residual > 0.0);
                assert_eq!(best.len(), 100);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn extreme_eigs_diag() {
        let (lo, hi) = extreme_eigs(&diag(&[1.0, 4.0]), 1e-10).unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-8);
        assert_relative_eq!(hi, 4.0, epsilon = 1e-8);
        let (lo, hi) = extreme_eigs(&diag(&[2.0, 2.0]), 1e-10).unwrap();
        assert_relative_eq!(lo, 2.0, epsilon = 1e-10);
        assert_relative_eq!(hi, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn extreme_eigs_tridiagonal_closed_form() {
        // Eigenvalues of tridiag(-1, 2, -1) are 2 - 2 cos(k pi / (n+1)).
        let n = 10;
        let (lo, hi) = extreme_eigs(&tridiag(n), 1e-9).unwrap();
        let lam = |k: usize| 2.0 - 2.0 * (k as f64 * core::f64::consts::PI / 11.0).cos();
        assert_relative_eq!(lo, lam(1), epsilon = 1e-6);
        assert_relative_eq!(hi, lam(10), epsilon = 1e-6);
    }

    #[test]
    fn eigs_bracket_rayleigh_quotients() {
        let a = tridiag(40);
        let (lo, hi) = extreme_eigs(&a, 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
            let av = a.matvec(&v).unwrap();
            let rq = dot(&v, &av) / dot(&v, &v);
            assert!(rq >= lo - 1e-8 && rq <= hi + 1e-8);
        }
    }
}
