//! Dense symmetric eigendecomposition.
//!
//! The production path is Householder tridiagonalization followed by the
//! implicit QL algorithm with Wilkinson-style shifts (the EISPACK `tred2`/`tql2`
//! pair). [`sym_eig_oracle`] is an independent cyclic Jacobi solver kept for
//! cross-checking on small matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Relative asymmetry accepted by the solvers.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Largest input accepted by [`sym_eig_oracle`].
pub const ORACLE_MAX_SIZE: usize = 64;

const QL_MAX_ITERATIONS: usize = 60;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted in descending order with orthonormal eigenvectors stored as
/// the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    /// Eigenvalues in `[-clamp_floor, 0)` were set to zero.
    pub clamp_floor: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ambient dimension of the eigenvectors.
    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// `Uᵀ x`, the coordinates of `x` in the eigenbasis.
    pub fn coordinates(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.vectors.transpose_matvec(x)
    }

    /// `U diag(w) Uᵀ x`.
    pub fn apply_diag(&self, weights: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: weights.len(),
            });
        }
        let mut coords = self.coordinates(x)?;
        for (c, w) in coords.iter_mut().zip(weights) {
            *c *= w;
        }
        self.vectors.matvec(&coords)
    }

    /// `U diag(f(λ)) Uᵀ` as a dense matrix.
    pub fn spectral_matrix(&self, mut f: impl FnMut(f64) -> f64) -> Matrix {
        let n = self.dim();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let u = self.vector(i);
            for r in 0..n {
                let ur = w * u[r];
                if ur == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += ur * u[c];
                }
            }
        }
        out
    }

    /// `Σ λ_i u_i u_iᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.spectral_matrix(|l| l)
    }

    /// `max |UᵀU - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self
            .vectors
            .transpose()
            .matmul(&self.vectors)
            .expect("shapes agree");
        let mut worst: f64 = 0.0;
        for i in 0..gram.rows() {
            for j in 0..gram.cols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Default clamp floor: `1e-12 · |trace|`, a cheap proxy for the largest eigenvalue.
pub fn default_clamp_floor(matrix: &Matrix) -> f64 {
    1e-12 * matrix.trace().abs()
}

/// Eigendecomposition of a symmetric PSD matrix.
///
/// Eigenvalues in `[-clamp_floor, 0)` are clamped to zero; anything more negative
/// is reported as [`Error::NotPositiveSemidefinite`].
pub fn sym_eig(matrix: &Matrix, clamp_floor: f64) -> Result<EigenSystem> {
    let mut eig = sym_eig_raw(matrix)?;
    let floor = clamp_floor.max(0.0);
    for v in eig.values.iter_mut() {
        if *v < 0.0 {
            if *v < -floor {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: *v,
                    floor,
                });
            }
            *v = 0.0;
        }
    }
    eig.clamp_floor = floor;
    Ok(eig)
}

/// Eigendecomposition of a general symmetric matrix, no clamping.
pub fn sym_eig_raw(matrix: &Matrix) -> Result<EigenSystem> {
    check_symmetric(matrix)?;
    let n = matrix.rows();
    if n == 0 {
        return Err(Error::Empty("matrix"));
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| matrix.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    // tql2 rotates columns of V; work on the transpose so rotations touch contiguous rows.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    tql2(&mut w, &mut d, &mut e)?;
    Ok(sorted_system(d, &w, 0.0))
}

/// Reference eigensolver: cyclic Jacobi rotations until the off-diagonal
/// Frobenius norm is below `1e-13` relative to the full norm.
pub fn sym_eig_oracle(matrix: &Matrix) -> Result<EigenSystem> {
    check_symmetric(matrix)?;
    let n = matrix.rows();
    if n == 0 {
        return Err(Error::Empty("matrix"));
    }
    if n > ORACLE_MAX_SIZE {
        return Err(Error::TooLarge {
            size: n,
            max: ORACLE_MAX_SIZE,
        });
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| matrix.row(i).to_vec()).collect();
    // symmetrize exactly
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = m;
            a[j][i] = m;
        }
    }
    // rows of `q` are eigenvectors
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let total = libm::sqrt(a.iter().flatten().map(|x| x * x).sum::<f64>());
    let target = 1e-13 * total;
    let mut sweeps = 0;
    loop {
        let off = libm::sqrt(
            (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum::<f64>(),
        );
        if off <= target || total == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p][r];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[r][r] - a[p][p]) / (2.0 * apr);
                let t =
                    libm::copysign(1.0, theta) / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akr = a[k][r];
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let ark = a[r][k];
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
                let (qp, qr) = if p < r {
                    let (lo, hi) = q.split_at_mut(r);
                    (&mut lo[p], &mut hi[0])
                } else {
                    unreachable!()
                };
                for k in 0..n {
                    let x = qp[k];
                    let y = qr[k];
                    qp[k] = c * x - s * y;
                    qr[k] = s * x + c * y;
                }
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    Ok(sorted_system(d, &q, 0.0))
}

fn check_symmetric(matrix: &Matrix) -> Result<()> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.rows(),
            found: matrix.cols(),
        });
    }
    let asym = matrix.relative_asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

/// `rows[i]` is the eigenvector for `values[i]`.
fn sorted_system(values: Vec<f64>, rows: &[Vec<f64>], clamp_floor: f64) -> EigenSystem {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let dim = rows.first().map_or(0, Vec::len);
    let vectors = Matrix::from_fn(dim, n, |r, c| rows[order[c]][r]);
    EigenSystem {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors,
        clamp_floor,
    }
}

/// Householder reduction to tridiagonal form; `v` holds the accumulated transform.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`; `w` holds eigenvectors as rows.
fn tql2(w: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_ITERATIONS {
                    return Err(Error::NoConvergence {
                        iterations: iter - 1,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut(i + 1);
                    let (wi, wi1) = (&mut lo[i], &mut hi[0]);
                    for (a, b) in wi.iter_mut().zip(wi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
